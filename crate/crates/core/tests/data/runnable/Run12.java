public class Run12 {
    public static void main(String[] args) {
        int a = 15;
        int b = a * 4;
        int c = a + b;
        System.out.println(c);
    }
}
