public class Run06 {
    public static void main(String[] args) {
        int a = 9;
        int b = a * 3;
        int c = a + b;
        System.out.println(c);
    }
}
