public class Run18 {
    public static void main(String[] args) {
        int a = 21;
        int b = a * 5;
        int c = a + b;
        System.out.println(c);
    }
}
