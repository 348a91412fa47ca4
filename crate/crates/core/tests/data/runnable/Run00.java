public class Run00 {
    public static void main(String[] args) {
        int a = 3;
        int b = a * 2;
        int c = a + b;
        System.out.println(c);
    }
}
